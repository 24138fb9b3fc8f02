from rest_framework.routers import DefaultRouter
from .views import DriftRecordViewSet

router = DefaultRouter()
router.register(r'', DriftRecordViewSet, basename='drift')

urlpatterns = router.urls
